#pragma once

// Umbrella header: the whole library in one include.

#include "zerosum/atoms.hpp"
#include "zerosum/certificates.hpp"
#include "zerosum/config.hpp"
#include "zerosum/construct.hpp"
#include "zerosum/errors.hpp"
#include "zerosum/group.hpp"
#include "zerosum/io.hpp"
#include "zerosum/lengths.hpp"
#include "zerosum/sequence.hpp"
