#pragma once

#include "rsparse/bump.hpp"
#include "rsparse/cz.hpp"
#include "rsparse/dyadic.hpp"
#include "rsparse/exponents.hpp"
#include "rsparse/fft.hpp"
#include "rsparse/gauge.hpp"
#include "rsparse/io.hpp"
#include "rsparse/multiplier.hpp"
#include "rsparse/quadrature.hpp"
#include "rsparse/rational.hpp"
#include "rsparse/spectral.hpp"
#include "rsparse/weights.hpp"
