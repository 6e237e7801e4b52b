// Copyright 2026 The qdots Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <vector>

namespace qdots {

// Level density sampled on an ascending grid. `mass` is the trapezoid (or
// histogram) integral of `values` over `grid`.
struct GridDensity {
  std::vector<double> grid;
  std::vector<double> values;
  double mass = 0.0;
};

// Trapezoid integral of values over grid.
double trapezoid_mass(const std::vector<double>& grid, const std::vector<double>& values);

}  // namespace qdots
