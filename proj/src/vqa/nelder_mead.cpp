#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qem/vqa.hpp"

namespace qem::vqa {

namespace {
using Point = std::vector<double>;

Point combine(double a, const Point& x, double b, const Point& y) {
    Point r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = a * x[i] + b * y[i];
    return r;
}
}  // namespace

NelderMead::NelderMead(CostFn f, std::vector<std::vector<double>> simplex, NelderMeadOptions opt)
    : f_fn_(std::move(f)), x_(std::move(simplex)), opt_(opt) {
    if (x_.size() < 2) throw std::invalid_argument("nelder_mead: simplex needs dim+1 vertices");
    const std::size_t dim = x_.front().size();
    if (x_.size() != dim + 1) throw std::invalid_argument("nelder_mead: simplex needs dim+1 vertices");
    Eigen::MatrixXd d(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t k = 1; k <= dim; ++k) {
        if (x_[k].size() != dim) throw std::invalid_argument("nelder_mead: vertex dimension mismatch");
        for (std::size_t i = 0; i < dim; ++i)
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k - 1)) = x_[k][i] - x_[0][i];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(d);
    lu.setThreshold(1e-12);
    if (lu.rank() < static_cast<Eigen::Index>(dim)) throw std::invalid_argument("nelder_mead: degenerate simplex");
}

double NelderMead::eval(const std::vector<double>& x) {
    auto e = f_fn_(x);
    shots_ += e.shots;
    ++evals_;
    return e.value;
}

void NelderMead::sort() {
    std::vector<std::size_t> idx(x_.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f_[a] < f_[b]; });
    std::vector<Point> x;
    std::vector<double> f;
    for (auto i : idx) {
        x.push_back(std::move(x_[i]));
        f.push_back(f_[i]);
    }
    x_ = std::move(x);
    f_ = std::move(f);
}

// The accepted point goes after every vertex with an equal value.
void NelderMead::replace_worst(std::vector<double> x, double f) {
    x_.pop_back();
    f_.pop_back();
    std::size_t k = 0;
    while (k < f_.size() && f_[k] <= f) ++k;
    x_.insert(x_.begin() + static_cast<std::ptrdiff_t>(k), std::move(x));
    f_.insert(f_.begin() + static_cast<std::ptrdiff_t>(k), f);
}

void NelderMead::step() {
    if (!initialized_) {
        f_.clear();
        for (const auto& v : x_) f_.push_back(eval(v));
        sort();
        initialized_ = true;
        return;
    }
    const std::size_t n = x_.size() - 1;
    Point xbar(x_[0].size(), 0.0);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < xbar.size(); ++i) xbar[i] += x_[k][i] / static_cast<double>(n);
    const Point& worst = x_[n];
    ++iters_;

    Point xr = combine(2.0, xbar, -1.0, worst);
    const double fr = eval(xr);
    if (fr < f_[0]) {
        Point xe = combine(3.0, xbar, -2.0, worst);
        const double fe = eval(xe);
        if (fe < fr) replace_worst(std::move(xe), fe);
        else replace_worst(std::move(xr), fr);
        return;
    }
    if (fr < f_[n - 1]) {
        replace_worst(std::move(xr), fr);
        return;
    }
    if (fr < f_[n]) {
        Point xc = combine(1.5, xbar, -0.5, worst);
        const double fc = eval(xc);
        if (fc <= fr) {
            replace_worst(std::move(xc), fc);
            return;
        }
    } else {
        Point xcc = combine(0.5, xbar, 0.5, worst);
        const double fcc = eval(xcc);
        if (fcc < f_[n]) {
            replace_worst(std::move(xcc), fcc);
            return;
        }
    }
    for (std::size_t k = 1; k <= n; ++k) {
        x_[k] = combine(0.5, x_[0], 0.5, x_[k]);
        f_[k] = eval(x_[k]);
    }
    sort();
}

bool NelderMead::converged() const {
    if (!initialized_) return false;
    if (iters_ >= opt_.max_iterations) return true;
    double df = 0.0, dx = 0.0;
    for (std::size_t k = 1; k < x_.size(); ++k) {
        df = std::max(df, std::abs(f_[k] - f_[0]));
        for (std::size_t i = 0; i < x_[k].size(); ++i) dx = std::max(dx, std::abs(x_[k][i] - x_[0][i]));
    }
    return df <= opt_.tol_f && dx <= opt_.tol_x;
}

OptimizationResult nelder_mead(const CostFn& f, std::vector<std::vector<double>> simplex, std::uint64_t budget,
                               NelderMeadOptions opt) {
    NelderMead nm(f, std::move(simplex), opt);
    OptimizationResult r;
    r.best_x = nm.vertices().front();
    while (!nm.converged()) {
        NelderMead before = nm;
        nm.step();
        if (nm.shots() > budget) {
            nm = std::move(before);
            break;
        }
        r.trajectory.push_back({nm.shots(), nm.best_f(), nm.best_x()});
    }
    if (nm.initialized()) {
        r.best_x = nm.best_x();
        r.best_f = nm.best_f();
    }
    r.shots = nm.shots();
    r.evaluations = nm.evaluations();
    return r;
}

std::vector<std::vector<double>> initial_simplex(const std::vector<double>& x0) {
    std::vector<std::vector<double>> s{x0};
    for (std::size_t i = 0; i < x0.size(); ++i) {
        auto v = x0;
        v[i] = x0[i] != 0.0 ? 1.05 * x0[i] : 0.00025;
        s.push_back(std::move(v));
    }
    return s;
}

}  // namespace qem::vqa
