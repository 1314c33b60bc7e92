#pragma once

#include <vector>

namespace grpx {

// Finite, strictly increasing point set t_0 < ... < t_n, n >= 1.
class Partition {
public:
    Partition() = default;
    explicit Partition(std::vector<double> points);

    static Partition uniform(double a, double b, int cells);
    static Partition dyadic(double a, double b, int depth) { return uniform(a, b, 1 << depth); }

    const std::vector<double>& points() const { return pts_; }
    int cells() const { return static_cast<int>(pts_.size()) - 1; }
    double start() const { return pts_.front(); }
    double end() const { return pts_.back(); }
    double operator[](int i) const { return pts_[static_cast<std::size_t>(i)]; }
    double mesh() const;

    // Union with extra points inside [start, end]; duplicates (up to 1e-14 relative) dropped.
    Partition refined(const std::vector<double>& extra) const;
    // Index of the point equal to t, or -1.
    int index_of(double t) const;
    // Every stride-th point (end always kept); used to walk a nested dyadic family.
    Partition coarsened(int stride) const;

private:
    std::vector<double> pts_;
};

}  // namespace grpx
