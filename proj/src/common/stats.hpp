#pragma once

#include <span>
#include <vector>

namespace eclab::stats {

// Sequential left-to-right sums; used wherever result bits must be reproducible.
double sum(std::span<const double> xs) noexcept;
double mean(std::span<const double> xs) noexcept;
// Population standard deviation (divisor n).
double pop_stddev(std::span<const double> xs) noexcept;

// (x - mean) / pop_stddev. Caller checks for zero spread first.
std::vector<double> standardize(std::span<const double> xs);

double pearson(std::span<const double> x, std::span<const double> y);
// Ranks 1..n, ties receive the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> xs);
double spearman(std::span<const double> x, std::span<const double> y);

double two_sided_t_pvalue(double t, double df);
double two_sided_normal_pvalue(double z);
double f_upper_pvalue(double f, double df1, double df2);

}  // namespace eclab::stats
