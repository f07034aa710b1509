#pragma once

#include "warntriage/adapters.hpp"
#include "warntriage/artifacts.hpp"
#include "warntriage/checkpoint.hpp"
#include "warntriage/commit_graph.hpp"
#include "warntriage/config.hpp"
#include "warntriage/csyntax.hpp"
#include "warntriage/diff.hpp"
#include "warntriage/encoder.hpp"
#include "warntriage/error.hpp"
#include "warntriage/features.hpp"
#include "warntriage/labeler.hpp"
#include "warntriage/metrics.hpp"
#include "warntriage/miner.hpp"
#include "warntriage/model.hpp"
#include "warntriage/pipeline.hpp"
#include "warntriage/process.hpp"
#include "warntriage/record_json.hpp"
#include "warntriage/rng.hpp"
#include "warntriage/runner.hpp"
#include "warntriage/synthetic.hpp"
#include "warntriage/warning.hpp"
