#pragma once

#include <Eigen/Dense>

#include "grpx/kernel.hpp"
#include "grpx/partition.hpp"

namespace grpx {

// Q_ij = R([t_{i-1}, t_i] x [t_{j-1}, t_j]) for cells of one partition.
Eigen::MatrixXd increment_gram(const CovarianceKernel& k, const Partition& d);

// Same for the cells of two partitions, rows from d1 and columns from d2.
Eigen::MatrixXd cross_increment_gram(const CovarianceKernel& k, const Partition& d1,
                                     const Partition& d2);

}  // namespace grpx
