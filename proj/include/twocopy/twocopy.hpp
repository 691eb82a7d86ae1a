#pragma once

#include "twocopy/channels.hpp"
#include "twocopy/errors.hpp"
#include "twocopy/estimators.hpp"
#include "twocopy/experiment.hpp"
#include "twocopy/json_io.hpp"
#include "twocopy/measurement.hpp"
#include "twocopy/qmath.hpp"
#include "twocopy/random.hpp"
#include "twocopy/states.hpp"
#include "twocopy/twirl.hpp"
