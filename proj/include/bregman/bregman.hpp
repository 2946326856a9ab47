#pragma once

#include "bregman/error.hpp"
#include "bregman/io.hpp"
#include "bregman/linalg.hpp"
#include "bregman/rates.hpp"
#include "bregman/regularisers.hpp"
#include "bregman/source_lab.hpp"
#include "bregman/sweep.hpp"
#include "bregman/tikhonov.hpp"
#include "bregman/tv_denoise.hpp"
#include "bregman/verify.hpp"
