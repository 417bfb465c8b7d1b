#pragma once

#include <Eigen/Core>

namespace twin {

using Index = Eigen::Index;

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

template <typename T>
using ConstRefMat = const Eigen::Ref<const Mat<T>>&;
template <typename T>
using ConstRefVec = const Eigen::Ref<const Vec<T>>&;

using Matd = Mat<double>;
using Vecd = Vec<double>;

} // namespace twin
