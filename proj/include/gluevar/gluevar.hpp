#pragma once

#include "core.hpp"
#include "distortion.hpp"
#include "choquet.hpp"
#include "bounds.hpp"
#include "oracle.hpp"
