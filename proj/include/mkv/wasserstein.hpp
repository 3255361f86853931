#pragma once

#include <span>

namespace mkv {

/// W1 between two equal-size empirical measures via the sorted (quantile)
/// coupling, which is optimal on the line.
double w1_sorted(std::span<const double> a, std::span<const double> b);

/// Minimum over all n! bijections of (1/n) sum |a_i - b_pi(i)|; n <= 8.
/// Test oracle for w1_sorted.
double w1_bruteforce(std::span<const double> a, std::span<const double> b);

}  // namespace mkv
