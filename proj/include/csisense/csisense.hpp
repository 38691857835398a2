#pragma once

#include "csisense/csi_tensor.hpp"
#include "csisense/dataset_io.hpp"
#include "csisense/error.hpp"
#include "csisense/features.hpp"
#include "csisense/harness.hpp"
#include "csisense/linalg.hpp"
#include "csisense/models.hpp"
#include "csisense/preprocess.hpp"
#include "csisense/random.hpp"
#include "csisense/synth.hpp"
