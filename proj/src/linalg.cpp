// linalg.cpp

#include "rcpump/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace rcpump {

MatX expm(const MatX& A) { return A.exp(); }

} // namespace rcpump
