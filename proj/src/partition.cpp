#include "grpx/partition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "grpx/errors.hpp"

namespace grpx {

Partition::Partition(std::vector<double> points) : pts_(std::move(points)) {
    if (pts_.size() < 2) throw DomainError("partition", "a partition needs at least two points");
    for (std::size_t i = 0; i < pts_.size(); ++i) {
        if (!std::isfinite(pts_[i])) throw DomainError("partition", "non-finite partition point");
        if (i > 0 && !(pts_[i] > pts_[i - 1]))
            throw DomainError("partition", "partition points must be strictly increasing");
    }
}

Partition Partition::uniform(double a, double b, int cells) {
    if (cells < 1) throw DomainError("partition", "need at least one cell");
    if (!(b > a)) throw DomainError("partition", "empty interval");
    std::vector<double> p(static_cast<std::size_t>(cells) + 1);
    for (int i = 0; i <= cells; ++i) p[static_cast<std::size_t>(i)] = a + (b - a) * i / cells;
    p.back() = b;
    return Partition(std::move(p));
}

double Partition::mesh() const {
    double m = 0.0;
    for (std::size_t i = 1; i < pts_.size(); ++i) m = std::max(m, pts_[i] - pts_[i - 1]);
    return m;
}

Partition Partition::refined(const std::vector<double>& extra) const {
    std::vector<double> p = pts_;
    const double tol = 1e-14 * std::max(1.0, std::abs(end() - start()));
    for (double x : extra) {
        if (x < start() - tol || x > end() + tol)
            throw DomainError("partition", "refinement point outside the partition range");
        p.push_back(std::clamp(x, start(), end()));
    }
    std::sort(p.begin(), p.end());
    std::vector<double> out;
    out.reserve(p.size());
    for (double x : p)
        if (out.empty() || x - out.back() > tol) out.push_back(x);
    // keep exact endpoints and exact requested values when they collapsed onto neighbours
    for (double x : extra)
        for (double& y : out)
            if (std::abs(y - x) <= tol) y = x;
    return Partition(std::move(out));
}

int Partition::index_of(double t) const {
    auto it = std::lower_bound(pts_.begin(), pts_.end(), t);
    if (it != pts_.end() && *it == t) return static_cast<int>(it - pts_.begin());
    return -1;
}

Partition Partition::coarsened(int stride) const {
    if (stride < 1) throw DomainError("partition", "stride must be >= 1");
    std::vector<double> p;
    for (std::size_t i = 0; i < pts_.size(); i += static_cast<std::size_t>(stride))
        p.push_back(pts_[i]);
    if (p.back() != pts_.back()) p.push_back(pts_.back());
    return Partition(std::move(p));
}

}  // namespace grpx
