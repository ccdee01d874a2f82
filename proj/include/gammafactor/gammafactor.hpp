#pragma once

#include "gammafactor/errors.hpp"
#include "gammafactor/numerics.hpp"
#include "gammafactor/spaces.hpp"
#include "gammafactor/multistart.hpp"
#include "gammafactor/tensor.hpp"
#include "gammafactor/tensor_norms.hpp"
#include "gammafactor/operators.hpp"
#include "gammafactor/certificates.hpp"
#include "gammafactor/gamma_norm.hpp"
#include "gammafactor/polynomials.hpp"
