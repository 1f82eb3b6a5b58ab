#pragma once

#include "equity/dataset.hpp"
#include "equity/evaluation.hpp"
#include "equity/feature_selection.hpp"
#include "equity/labeling.hpp"
#include "equity/model.hpp"
#include "equity/model_io.hpp"
#include "equity/pipeline.hpp"
#include "equity/report.hpp"
#include "equity/synth.hpp"
