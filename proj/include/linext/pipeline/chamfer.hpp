#pragma once

#include "linext/core/types.hpp"

namespace linext::pipeline {

/// mean_p min_q |p - q|^2 + mean_q min_p |q - p|^2 with exact nearest
/// neighbours. The per-point terms are summed in sorted order, so the value
/// does not depend on how either cloud is ordered.
double chamfer(const PointCloud& p, const PointCloud& q);

/// Same quantity from an all-pairs scan.
double chamfer_bruteforce(const PointCloud& p, const PointCloud& q);

}  // namespace linext::pipeline
