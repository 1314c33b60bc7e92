#include "grpx/gram.hpp"

namespace grpx {

Eigen::MatrixXd increment_gram(const CovarianceKernel& k, const Partition& d) {
    const Eigen::MatrixXd g = k.point_gram(d.points());
    const Eigen::Index n = d.cells();
    // second difference of the point Gram; n^2 kernel calls instead of 4 n^2
    Eigen::MatrixXd q = g.bottomRightCorner(n, n) - g.topRightCorner(n, n) -
                        g.bottomLeftCorner(n, n) + g.topLeftCorner(n, n);
    return 0.5 * (q + q.transpose());
}

Eigen::MatrixXd cross_increment_gram(const CovarianceKernel& k, const Partition& d1,
                                     const Partition& d2) {
    const auto& p1 = d1.points();
    const auto& p2 = d2.points();
    const auto n1 = static_cast<Eigen::Index>(p1.size());
    const auto n2 = static_cast<Eigen::Index>(p2.size());
    Eigen::MatrixXd g(n1, n2);
    for (Eigen::Index i = 0; i < n1; ++i)
        for (Eigen::Index j = 0; j < n2; ++j) g(i, j) = k(p1[i], p2[j]);
    const Eigen::Index a = n1 - 1, b = n2 - 1;
    return g.bottomRightCorner(a, b) - g.topRightCorner(a, b) - g.bottomLeftCorner(a, b) +
           g.topLeftCorner(a, b);
}

}  // namespace grpx
