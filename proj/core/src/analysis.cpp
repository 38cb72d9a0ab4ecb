#include "syk/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace syk {

namespace {

const std::vector<double>& series_of(const TrajectoryRecord& r, Observable which) {
    return which == Observable::half_chain_entropy ? r.s_half : r.purity_series;
}

}  // namespace

EnsembleSeries ensemble_average(const std::vector<TrajectoryRecord>& records, int n_batches,
                                Observable which) {
    if (records.empty()) throw std::invalid_argument("ensemble_average: no records");
    const int n_runs = int(records.size());
    if (n_batches < 1 || n_runs % n_batches != 0)
        throw std::invalid_argument("ensemble_average: n_runs must divide into n_batches");
    const auto& grid = records.front().times;
    const std::size_t np = grid.size();
    for (const auto& r : records) {
        if (r.times.size() != np)
            throw std::invalid_argument("ensemble_average: inconsistent time grids");
        for (std::size_t i = 0; i < np; ++i)
            if (std::abs(r.times[i] - grid[i]) > 1e-12)
                throw std::invalid_argument("ensemble_average: inconsistent time grids");
        if (series_of(r, which).size() != np)
            throw std::invalid_argument("ensemble_average: record missing requested observable");
    }

    EnsembleSeries out;
    out.t = grid;
    out.n_runs = n_runs;
    out.n_batches = n_batches;
    out.mean.assign(np, 0.0);
    out.std_batch.assign(np, 0.0);
    const int rpb = n_runs / n_batches;

    std::vector<std::vector<double>> batch_mean(n_batches, std::vector<double>(np, 0.0));
    for (int run = 0; run < n_runs; ++run) {
        const auto& y = series_of(records[run], which);
        auto& bm = batch_mean[run / rpb];
        for (std::size_t i = 0; i < np; ++i) bm[i] += y[i];
    }
    for (auto& bm : batch_mean)
        for (double& v : bm) v /= rpb;
    for (std::size_t i = 0; i < np; ++i) {
        double m = 0.0;
        for (const auto& bm : batch_mean) m += bm[i];
        m /= n_batches;
        out.mean[i] = m;
        if (n_batches > 1) {
            double ss = 0.0;
            for (const auto& bm : batch_mean) ss += (bm[i] - m) * (bm[i] - m);
            out.std_batch[i] = std::sqrt(ss / (n_batches - 1));
        }
    }
    return out;
}

namespace {

// First index-interval upward crossing of `target`, linearly interpolated.
double first_crossing(const std::vector<double>& t, const std::vector<double>& s, double target) {
    if (s.front() >= target) return t.front();
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i - 1] < target && s[i] >= target) {
            double f = (target - s[i - 1]) / (s[i] - s[i - 1]);
            return t[i - 1] + f * (t[i] - t[i - 1]);
        }
    }
    throw std::runtime_error("gamma_egr: series never crosses " + g9(target));
}

}  // namespace

EgrResult extract_gamma_egr(const std::vector<double>& t, const std::vector<double>& s) {
    if (t.size() != s.size() || t.size() < 5)
        throw std::invalid_argument("gamma_egr: need matched series with at least 5 samples");
    const std::size_t n = t.size();

    double peak_slope = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < n; ++i) {
        double dt = t[i] - t[i - 1];
        if (dt <= 0.0) throw std::invalid_argument("gamma_egr: time grid not increasing");
        peak_slope = std::max(peak_slope, (s[i] - s[i - 1]) / dt);
    }
    if (!(peak_slope > 0.0)) throw std::runtime_error("gamma_egr: series never grows");

    const std::size_t n_tail = std::max<std::size_t>(2, n / 10);
    std::vector<double> tt(t.end() - n_tail, t.end());
    std::vector<double> ts(s.end() - n_tail, s.end());
    const double tail_slope = linear_fit(tt, ts).slope;
    if (!(std::abs(tail_slope) < 0.01 * peak_slope))
        throw std::runtime_error("gamma_egr: no plateau (tail slope " + g9(tail_slope) +
                                 " vs peak slope " + g9(peak_slope) + ")");

    double s_inf = 0.0;
    for (double v : ts) s_inf += v;
    s_inf /= double(n_tail);

    EgrResult r;
    r.s_inf = s_inf;
    r.t_quarter = first_crossing(t, s, s_inf / 4.0);
    r.t_three_quarter = first_crossing(t, s, 3.0 * s_inf / 4.0);
    const double dt = r.t_three_quarter - r.t_quarter;
    if (!(dt > 0.0)) throw std::runtime_error("gamma_egr: degenerate threshold crossings");
    r.gamma_egr = s_inf / (2.0 * dt);
    return r;
}

FitResult tanh_fit(const std::vector<double>& t, const std::vector<double>& purity, long dim,
                   double lambda_max) {
    if (t.size() != purity.size() || t.empty())
        throw std::invalid_argument("tanh_fit: need matched nonempty series");
    if (dim < 2) throw std::invalid_argument("tanh_fit: dim must be at least 2");
    if (!(lambda_max >= 0.0)) throw std::invalid_argument("tanh_fit: lambda_max must be >= 0");
    const double alpha = std::atanh(1.0 / double(dim));

    double y_mean = 0.0;
    for (double y : purity) y_mean += y;
    y_mean /= double(purity.size());
    double ss_tot = 0.0;
    for (double y : purity) ss_tot += (y - y_mean) * (y - y_mean);
    if (ss_tot < 1e-12)
        return {0.0, alpha, std::numeric_limits<double>::quiet_NaN()};

    auto ss_res = [&](double lam) {
        double ss = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            double r = std::tanh(lam * t[i] + alpha) - purity[i];
            ss += r * r;
        }
        return ss;
    };

    // golden-section minimization over [0, lambda_max]
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = lambda_max;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = ss_res(c), fd = ss_res(d);
    const double tol = 1e-6 * std::max(lambda_max, 1e-300);
    for (int it = 0; it < 200 && (b - a) > tol; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = ss_res(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = ss_res(d);
        }
    }
    const double lambda = 0.5 * (a + b);
    return {lambda, alpha, 1.0 - ss_res(lambda) / ss_tot};
}

nlohmann::json fit_to_json(const FitResult& fit) {
    return {{"lambda", fit.lambda}, {"alpha", fit.alpha}, {"r_squared", fit.r_squared}};
}

double steady_state_value(const std::vector<double>& t, const std::vector<double>& y,
                          double t_inf) {
    if (t.size() != y.size() || t.empty())
        throw std::invalid_argument("steady_state_value: need matched nonempty series");
    if (t_inf > t.back() + 1e-9)
        throw std::out_of_range("steady_state_value: t_inf beyond grid");
    std::size_t count = 0;
    while (count < t.size() && t[count] <= t_inf + 1e-9) ++count;
    if (count == 0) throw std::out_of_range("steady_state_value: no samples before t_inf");
    const std::size_t n_tail = std::max<std::size_t>(1, count / 10);
    double sum = 0.0;
    for (std::size_t i = count - n_tail; i < count; ++i) sum += y[i];
    return sum / double(n_tail);
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("linear_fit: need at least 2 matched samples");
    const double n = double(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("linear_fit: degenerate x values");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = syy - f.slope * sxy;
    f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : std::numeric_limits<double>::quiet_NaN();
    return f;
}

std::string g9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_series_csv(std::ostream& out, const EnsembleSeries& series,
                      const std::vector<std::pair<std::string, std::string>>& header) {
    for (const auto& [k, v] : header) out << "# " << k << ": " << v << "\n";
    out << "t,mean,std_batch\n";
    for (std::size_t i = 0; i < series.t.size(); ++i)
        out << g9(series.t[i]) << ',' << g9(series.mean[i]) << ',' << g9(series.std_batch[i])
            << "\n";
}

}  // namespace syk
