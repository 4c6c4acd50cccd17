#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "abmcal/surrogate/decision_tree.hpp"

namespace abmcal {

struct SvmOptions {
    double C = 1.0;
    double tol = 1e-3;
    double epsilon = 0.001;
    int max_iter = 200000;
};

namespace detail {

inline double rbf_kernel(const std::vector<double>& a, const std::vector<double>& b, double gamma)
{
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sq += d * d;
    }
    return std::exp(-gamma * sq);
}

inline std::vector<std::vector<double>> gram_matrix(const FeatureMatrix& X, double gamma)
{
    const std::size_t n = X.size();
    std::vector<std::vector<double>> K(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        K[i][i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) K[i][j] = K[j][i] = rbf_kernel(X[i], X[j], gamma);
    }
    return K;
}

} // namespace detail

// Soft-margin RBF classifier trained by maximal-violating-pair SMO.
class SvmClassifier {
public:
    void fit(const FeatureMatrix& X, const std::vector<double>& y01, SvmOptions options = {})
    {
        if (X.size() != y01.size() || X.empty())
            throw std::invalid_argument("SvmClassifier: bad training data");
        const std::size_t n = X.size();
        gamma_ = 1.0 / static_cast<double>(X[0].size());
        options_ = options;
        X_ = X;
        y_.resize(n);
        for (std::size_t i = 0; i < n; ++i) y_[i] = y01[i] > 0.5 ? 1.0 : -1.0;

        const auto K = detail::gram_matrix(X_, gamma_);
        alpha_.assign(n, 0.0);
        std::vector<double> u(n, 0.0);
        const double C = options_.C;

        for (int iter = 0; iter < options_.max_iter; ++iter) {
            // b_lo = max over I_up of (y - u), b_hi = min over I_low; their gap
            // is the KKT violation.
            double m = -std::numeric_limits<double>::infinity();
            double M = std::numeric_limits<double>::infinity();
            std::size_t i = n, j = n;
            for (std::size_t t = 0; t < n; ++t) {
                const double viol = y_[t] - u[t];
                const bool in_up = (y_[t] > 0.0 && alpha_[t] < C) || (y_[t] < 0.0 && alpha_[t] > 0.0);
                const bool in_low = (y_[t] < 0.0 && alpha_[t] < C) || (y_[t] > 0.0 && alpha_[t] > 0.0);
                if (in_up && viol > m) {
                    m = viol;
                    i = t;
                }
                if (in_low && viol < M) {
                    M = viol;
                    j = t;
                }
            }
            if (i >= n || j >= n || m - M <= options_.tol) break;

            const double Ei = u[i] - y_[i];
            const double Ej = u[j] - y_[j];
            double L, H;
            if (y_[i] != y_[j]) {
                L = std::max(0.0, alpha_[j] - alpha_[i]);
                H = std::min(C, C + alpha_[j] - alpha_[i]);
            } else {
                L = std::max(0.0, alpha_[i] + alpha_[j] - C);
                H = std::min(C, alpha_[i] + alpha_[j]);
            }
            double eta = K[i][i] + K[j][j] - 2.0 * K[i][j];
            if (eta < 1e-12) eta = 1e-12;
            double aj = alpha_[j] + y_[j] * (Ei - Ej) / eta;
            aj = std::clamp(aj, L, H);
            const double ai = alpha_[i] + y_[i] * y_[j] * (alpha_[j] - aj);
            const double di = ai - alpha_[i];
            const double dj = aj - alpha_[j];
            if (std::abs(di) < 1e-14 && std::abs(dj) < 1e-14) break;
            alpha_[i] = ai;
            alpha_[j] = aj;
            for (std::size_t t = 0; t < n; ++t) u[t] += di * y_[i] * K[i][t] + dj * y_[j] * K[j][t];
        }

        // Offset from free support vectors; midpoint of the KKT interval if
        // every multiplier sits on a bound.
        double bsum = 0.0;
        std::size_t bcount = 0;
        for (std::size_t t = 0; t < n; ++t) {
            if (alpha_[t] > 1e-9 && alpha_[t] < C - 1e-9) {
                bsum += y_[t] - u[t];
                ++bcount;
            }
        }
        if (bcount > 0) {
            b_ = bsum / static_cast<double>(bcount);
        } else {
            double m = -std::numeric_limits<double>::infinity();
            double M = std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < n; ++t) {
                const double viol = y_[t] - u[t];
                const bool in_up = (y_[t] > 0.0 && alpha_[t] < C) || (y_[t] < 0.0 && alpha_[t] > 0.0);
                const bool in_low = (y_[t] < 0.0 && alpha_[t] < C) || (y_[t] > 0.0 && alpha_[t] > 0.0);
                if (in_up) m = std::max(m, viol);
                if (in_low) M = std::min(M, viol);
            }
            b_ = std::isfinite(m) && std::isfinite(M) ? 0.5 * (m + M) : 0.0;
        }
        fitted_ = true;
    }

    double decision_function(const std::vector<double>& x) const
    {
        if (!fitted_) throw std::logic_error("SvmClassifier: not fitted");
        double f = b_;
        for (std::size_t t = 0; t < X_.size(); ++t)
            if (alpha_[t] > 1e-12) f += alpha_[t] * y_[t] * detail::rbf_kernel(X_[t], x, gamma_);
        return f;
    }

    double predict(const std::vector<double>& x) const
    {
        return decision_function(x) >= 0.0 ? 1.0 : 0.0;
    }

    const std::vector<double>& alphas() const { return alpha_; }
    const std::vector<double>& signs() const { return y_; }

private:
    FeatureMatrix X_;
    std::vector<double> y_;
    std::vector<double> alpha_;
    double b_ = 0.0;
    double gamma_ = 1.0;
    SvmOptions options_;
    bool fitted_ = false;
};

// Epsilon-insensitive RBF regressor. Works on beta_i = alpha_i - alpha*_i with
// the constraints sum(beta) = 0, |beta_i| <= C; each SMO step moves a
// maximal-violating pair along e_i - e_j and minimises the piecewise-quadratic
// one-dimensional restriction exactly.
class SvmRegressor {
public:
    void fit(const FeatureMatrix& X, const std::vector<double>& y, SvmOptions options = {})
    {
        if (X.size() != y.size() || X.size() < 2)
            throw std::invalid_argument("SvmRegressor: bad training data");
        const std::size_t n = X.size();
        gamma_ = 1.0 / static_cast<double>(X[0].size());
        options_ = options;
        X_ = X;

        const auto K = detail::gram_matrix(X_, gamma_);
        beta_.assign(n, 0.0);
        std::vector<double> g(n);
        for (std::size_t t = 0; t < n; ++t) g[t] = -y[t];
        const double C = options_.C;
        const double eps = options_.epsilon;

        const auto up_slope = [&](std::size_t t) {
            return g[t] + (beta_[t] >= 0.0 ? eps : -eps);
        };
        const auto down_slope = [&](std::size_t t) {
            return g[t] + (beta_[t] > 0.0 ? eps : -eps);
        };

        for (int iter = 0; iter < options_.max_iter; ++iter) {
            double lo_slope = std::numeric_limits<double>::infinity();
            double hi_slope = -std::numeric_limits<double>::infinity();
            std::size_t i = n, j = n;
            for (std::size_t t = 0; t < n; ++t) {
                if (beta_[t] < C) {
                    const double s = up_slope(t);
                    if (s < lo_slope) {
                        lo_slope = s;
                        i = t;
                    }
                }
                if (beta_[t] > -C) {
                    const double s = down_slope(t);
                    if (s > hi_slope) {
                        hi_slope = s;
                        j = t;
                    }
                }
            }
            if (i >= n || j >= n || i == j || lo_slope - hi_slope >= -options_.tol) break;

            const double bi = beta_[i], bj = beta_[j];
            const double lo = std::max(-C - bi, bj - C);
            const double hi = std::min(C - bi, bj + C);
            double eta = K[i][i] + K[j][j] - 2.0 * K[i][j];
            if (eta < 0.0) eta = 0.0;
            const double slope0 = g[i] - g[j];

            // Breakpoints where |beta_i + t| or |beta_j - t| changes slope.
            std::vector<double> knots{lo, hi};
            if (-bi > lo && -bi < hi) knots.push_back(-bi);
            if (bj > lo && bj < hi) knots.push_back(bj);
            std::sort(knots.begin(), knots.end());

            const auto value = [&](double t) {
                return 0.5 * eta * t * t + slope0 * t +
                       eps * (std::abs(bi + t) - std::abs(bi) + std::abs(bj - t) - std::abs(bj));
            };
            double best_t = 0.0;
            double best_v = 0.0;
            const auto consider = [&](double t) {
                const double v = value(t);
                if (v < best_v - 1e-15) {
                    best_v = v;
                    best_t = t;
                }
            };
            for (double t : knots) consider(t);
            for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
                const double a = knots[s], b = knots[s + 1];
                if (!(a < b) || eta <= 1e-12) continue;
                const double mid = 0.5 * (a + b);
                const double s1 = bi + mid >= 0.0 ? 1.0 : -1.0;
                const double s2 = bj - mid >= 0.0 ? 1.0 : -1.0;
                const double t_star = -(slope0 + eps * (s1 - s2)) / eta;
                if (t_star > a && t_star < b) consider(t_star);
            }
            if (std::abs(best_t) < 1e-14) break;

            beta_[i] += best_t;
            beta_[j] -= best_t;
            for (std::size_t t = 0; t < n; ++t) g[t] += best_t * (K[i][t] - K[j][t]);
        }

        double bsum = 0.0;
        std::size_t bcount = 0;
        for (std::size_t t = 0; t < n; ++t) {
            const double mag = std::abs(beta_[t]);
            if (mag > 1e-9 && mag < C - 1e-9) {
                bsum += -(g[t] + (beta_[t] > 0.0 ? eps : -eps));
                ++bcount;
            }
        }
        if (bcount > 0) {
            b_ = bsum / static_cast<double>(bcount);
        } else {
            double lo_b = -std::numeric_limits<double>::infinity();
            double hi_b = std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < n; ++t) {
                if (beta_[t] < C) lo_b = std::max(lo_b, -up_slope(t));
                if (beta_[t] > -C) hi_b = std::min(hi_b, -down_slope(t));
            }
            b_ = std::isfinite(lo_b) && std::isfinite(hi_b) ? 0.5 * (lo_b + hi_b) : 0.0;
        }
        fitted_ = true;
    }

    double predict(const std::vector<double>& x) const
    {
        if (!fitted_) throw std::logic_error("SvmRegressor: not fitted");
        double f = b_;
        for (std::size_t t = 0; t < X_.size(); ++t)
            if (std::abs(beta_[t]) > 1e-12) f += beta_[t] * detail::rbf_kernel(X_[t], x, gamma_);
        return f;
    }

    const std::vector<double>& betas() const { return beta_; }

private:
    FeatureMatrix X_;
    std::vector<double> beta_;
    double b_ = 0.0;
    double gamma_ = 1.0;
    SvmOptions options_;
    bool fitted_ = false;
};

} // namespace abmcal
