// Copyright 2026 The magkit Authors
// SPDX-License-Identifier: Apache-2.0

// Magnitude of an interval sample as the scale grows, next to the 1 + t L / 2
// value of the continuous interval [0, L].

#include <cstdio>

#include "magkit/magkit.hpp"

int main() {
  constexpr int n = 400;
  constexpr double length = 6.0;
  magkit::Matrix pts(n, 1);
  for (int i = 0; i < n; ++i) pts(i, 0) = length * i / (n - 1);
  const auto dist = magkit::pairwise_distances(magkit::PointCloud(pts));

  const auto series = magkit::magnitude_function(dist, magkit::log_grid(0.01, 10.0, 3));
  std::printf("%10s %12s %12s\n", "t", "Mag(tX)", "1 + tL/2");
  for (std::size_t i = 0; i < series.ts.size(); ++i) {
    const double t = series.ts[i];
    if (series.mags[i]) {
      std::printf("%10.4g %12.6f %12.6f\n", t, *series.mags[i], 1.0 + t * length / 2.0);
    } else {
      std::printf("%10.4g %12s\n", t, "(gap)");
    }
  }
}
