#pragma once

#include "cure_copula/copulas.hpp"
#include "cure_copula/cure_model.hpp"
#include "cure_copula/error.hpp"
#include "cure_copula/estimation.hpp"
#include "cure_copula/identifiability.hpp"
#include "cure_copula/inference.hpp"
#include "cure_copula/io.hpp"
#include "cure_copula/marginals.hpp"
#include "cure_copula/nelder_mead.hpp"
#include "cure_copula/parallel.hpp"
#include "cure_copula/report.hpp"
#include "cure_copula/rng.hpp"
#include "cure_copula/simulation.hpp"
#include "cure_copula/special.hpp"
