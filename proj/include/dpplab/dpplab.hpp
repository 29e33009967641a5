#pragma once

#include "abp.hpp"
#include "battery.hpp"
#include "dpp.hpp"
#include "io.hpp"
#include "lab.hpp"
#include "regularity.hpp"
#include "walker.hpp"
