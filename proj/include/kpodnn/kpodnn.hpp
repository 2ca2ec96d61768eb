#pragma once

#include "kpodnn/config.hpp"
#include "kpodnn/error.hpp"
#include "kpodnn/io.hpp"
#include "kpodnn/linalg.hpp"
#include "kpodnn/network.hpp"
#include "kpodnn/optimizer.hpp"
#include "kpodnn/pipeline.hpp"
#include "kpodnn/random.hpp"
#include "kpodnn/reduction.hpp"
#include "kpodnn/sampling.hpp"
#include "kpodnn/snapshots.hpp"
#include "kpodnn/training.hpp"
#include "kpodnn/wave_fom.hpp"
