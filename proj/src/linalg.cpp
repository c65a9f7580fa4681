#include "qnlab/linalg.hpp"

namespace qnlab {

template class Matrix<double>;
template class Matrix<BigFloat>;
template class Cholesky<double>;
template class Cholesky<BigFloat>;
template class SymmetricIndefiniteFactor<double>;
template class SymmetricIndefiniteFactor<BigFloat>;

}  // namespace qnlab
