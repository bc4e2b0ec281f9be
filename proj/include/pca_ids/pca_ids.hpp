#pragma once

#include "pca_ids/error.hpp"
#include "pca_ids/kdd.hpp"
#include "pca_ids/mvstats.hpp"
#include "pca_ids/model.hpp"
#include "pca_ids/detector.hpp"
#include "pca_ids/trainer.hpp"
#include "pca_ids/evaluator.hpp"
#include "pca_ids/model_io.hpp"
