#pragma once

#include "binrbm/classifier.hpp"
#include "binrbm/dataset.hpp"
#include "binrbm/enumeration.hpp"
#include "binrbm/error.hpp"
#include "binrbm/markov.hpp"
#include "binrbm/matrix.hpp"
#include "binrbm/metrics.hpp"
#include "binrbm/preprocess.hpp"
#include "binrbm/rbm.hpp"
#include "binrbm/rng.hpp"
#include "binrbm/serialize.hpp"

namespace binrbm {
inline constexpr char kVersion[] = "0.1.0";
}
