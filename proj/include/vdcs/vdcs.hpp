#pragma once

#include "vdcs/coherence.hpp"
#include "vdcs/fourier.hpp"
#include "vdcs/haar.hpp"
#include "vdcs/image.hpp"
#include "vdcs/io.hpp"
#include "vdcs/phantom.hpp"
#include "vdcs/random.hpp"
#include "vdcs/sampling.hpp"
#include "vdcs/solvers.hpp"
#include "vdcs/verify.hpp"
#include "vdcs/version.hpp"
