#include "qnlab/preconditioner.hpp"

namespace qnlab {

template class Preconditioner<double>;
template class Preconditioner<BigFloat>;

}  // namespace qnlab
