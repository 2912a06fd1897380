#pragma once

// Umbrella header.

#include "maskpriv/blur.hpp"
#include "maskpriv/classifier.hpp"
#include "maskpriv/csv.hpp"
#include "maskpriv/dataset.hpp"
#include "maskpriv/detect.hpp"
#include "maskpriv/errors.hpp"
#include "maskpriv/experiments.hpp"
#include "maskpriv/image.hpp"
#include "maskpriv/pipeline.hpp"
#include "maskpriv/protocol.hpp"
#include "maskpriv/rng.hpp"
#include "maskpriv/synth.hpp"
