#pragma once

#include "mergesim/calibration.hpp"
#include "mergesim/config.hpp"
#include "mergesim/decision.hpp"
#include "mergesim/drac.hpp"
#include "mergesim/engine.hpp"
#include "mergesim/extraction.hpp"
#include "mergesim/game.hpp"
#include "mergesim/longitudinal.hpp"
#include "mergesim/mobil.hpp"
#include "mergesim/nash.hpp"
#include "mergesim/optimizer.hpp"
#include "mergesim/presets.hpp"
#include "mergesim/scene.hpp"
#include "mergesim/svg_plot.hpp"
#include "mergesim/synthetic.hpp"
#include "mergesim/trajectory_log.hpp"
