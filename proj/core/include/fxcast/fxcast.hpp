#pragma once

#include "fxcast/dataio.hpp"
#include "fxcast/errors.hpp"
#include "fxcast/evalkit.hpp"
#include "fxcast/models.hpp"
#include "fxcast/numkit.hpp"
#include "fxcast/pipeline.hpp"
#include "fxcast/serialize.hpp"
#include "fxcast/train.hpp"
