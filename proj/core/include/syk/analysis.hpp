#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "syk/trajectory.hpp"

namespace syk {

// Pointwise ensemble statistics over a set of trajectory runs sharing one
// time grid. std_batch is the standard deviation of the batch means, where
// runs are assigned to batches by run index (deterministic).
struct EnsembleSeries {
    std::vector<double> t;
    std::vector<double> mean;
    std::vector<double> std_batch;
    int n_runs = 0;
    int n_batches = 0;
};

EnsembleSeries ensemble_average(const std::vector<TrajectoryRecord>& records, int n_batches,
                                Observable which);

// Entanglement growth rate extracted from an unmonitored ensemble-mean
// entropy series: s_inf is the tail-window mean, t_quarter/t_three_quarter
// the first upward crossings of s_inf/4 and 3*s_inf/4 (linearly
// interpolated), and gamma_egr = s_inf / (2*(t_three_quarter - t_quarter)).
struct EgrResult {
    double gamma_egr;
    double s_inf;
    double t_quarter;
    double t_three_quarter;
};

// Throws std::runtime_error with diagnostics when the series has no plateau
// (least-squares slope of the last-10% window must stay below 1% of the peak
// finite-difference slope) or a threshold is never crossed.
EgrResult extract_gamma_egr(const std::vector<double>& t, const std::vector<double>& s);

// One-parameter fit purity(t) ~= tanh(lambda*t + alpha) with alpha pinned by
// tanh(alpha) = 1/dim. lambda is found by golden-section search over
// [0, lambda_max] to relative tolerance 1e-6. A flat series (SS_tot < 1e-12)
// yields lambda = 0 with r_squared = NaN.
struct FitResult {
    double lambda;
    double alpha;
    double r_squared;
};

FitResult tanh_fit(const std::vector<double>& t, const std::vector<double>& purity, long dim,
                   double lambda_max);

nlohmann::json fit_to_json(const FitResult& fit);

// Mean over the final 10% (at least one sample) of the samples at times
// <= t_inf. Throws std::out_of_range when t_inf lies beyond the grid.
double steady_state_value(const std::vector<double>& t, const std::vector<double>& y,
                          double t_inf);

struct LinearFit {
    double slope;
    double intercept;
    double r_squared;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Shortest representation with 9 significant digits ("%.9g").
std::string g9(double v);

// "# key: value" header lines, a "t,mean,std_batch" column row, then data.
void write_series_csv(std::ostream& out, const EnsembleSeries& series,
                      const std::vector<std::pair<std::string, std::string>>& header);

}  // namespace syk
