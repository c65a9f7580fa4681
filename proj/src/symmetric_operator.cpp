#include "qnlab/symmetric_operator.hpp"

namespace qnlab {

template class SymmetricOperator<double>;
template class SymmetricOperator<BigFloat>;

}  // namespace qnlab
