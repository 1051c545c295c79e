// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "magkit/active_learning.hpp"
#include "magkit/approx.hpp"
#include "magkit/error.hpp"
#include "magkit/gluing.hpp"
#include "magkit/graphs.hpp"
#include "magkit/kdtree.hpp"
#include "magkit/metric.hpp"
#include "magkit/outlier.hpp"
#include "magkit/random.hpp"
#include "magkit/weighting.hpp"
