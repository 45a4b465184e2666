#ifndef MSSVDD_MSSVDD_HPP
#define MSSVDD_MSSVDD_HPP

#include "mssvdd/datamodel.hpp"
#include "mssvdd/error.hpp"
#include "mssvdd/eval.hpp"
#include "mssvdd/io.hpp"
#include "mssvdd/kernel.hpp"
#include "mssvdd/model.hpp"
#include "mssvdd/random.hpp"
#include "mssvdd/subspace.hpp"
#include "mssvdd/svdd.hpp"

#endif  // MSSVDD_MSSVDD_HPP
