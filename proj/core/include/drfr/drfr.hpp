#pragma once

// Convenience umbrella header.

#include "drfr/checkpoint.hpp"
#include "drfr/error.hpp"
#include "drfr/graph.hpp"
#include "drfr/io.hpp"
#include "drfr/loss.hpp"
#include "drfr/model.hpp"
#include "drfr/pca.hpp"
#include "drfr/psd.hpp"
#include "drfr/quartet.hpp"
#include "drfr/retrieval.hpp"
#include "drfr/synthetic.hpp"
#include "drfr/trainer.hpp"
