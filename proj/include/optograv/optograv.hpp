#pragma once

#include "types.hpp"
#include "fock.hpp"
#include "liouvillian.hpp"
#include "linearization.hpp"
#include "mean_field.hpp"
#include "fluctuations.hpp"
#include "metrology.hpp"
#include "weak_drive.hpp"
#include "oracle.hpp"
#include "fit.hpp"
#include "parallel.hpp"
