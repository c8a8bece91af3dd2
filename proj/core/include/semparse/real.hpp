#pragma once

namespace semparse {

#ifdef SEMPARSE_SINGLE_PRECISION
using real = float;
#else
using real = double;
#endif

}  // namespace semparse
