#pragma once

#include "gbias/bias_metrics.hpp"
#include "gbias/embedding_store.hpp"
#include "gbias/error.hpp"
#include "gbias/eval_harness.hpp"
#include "gbias/gender_geometry.hpp"
#include "gbias/lexicon.hpp"
#include "gbias/mitigation.hpp"
#include "gbias/statistics.hpp"
#include "gbias/synthetic.hpp"
#include "gbias/vector_ops.hpp"
