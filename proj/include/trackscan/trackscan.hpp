#pragma once

#include "trackscan/bench.hpp"
#include "trackscan/calibration.hpp"
#include "trackscan/control.hpp"
#include "trackscan/ellipse.hpp"
#include "trackscan/error.hpp"
#include "trackscan/frame.hpp"
#include "trackscan/grr.hpp"
#include "trackscan/laser_line.hpp"
#include "trackscan/measure.hpp"
#include "trackscan/platform.hpp"
#include "trackscan/stats.hpp"
#include "trackscan/step_report.hpp"
#include "trackscan/synth.hpp"
#include "trackscan/track.hpp"
