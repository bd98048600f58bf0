#pragma once

#include "geoflow/errors.hpp"
#include "geoflow/poly2.hpp"
#include "geoflow/metric2d.hpp"
#include "geoflow/torus_space.hpp"
#include "geoflow/disc_space.hpp"
#include "geoflow/fourier_field.hpp"
#include "geoflow/battery.hpp"
#include "geoflow/identity_lab.hpp"
#include "geoflow/cg.hpp"
#include "geoflow/beurling.hpp"
#include "geoflow/jacobi_riccati.hpp"
#include "geoflow/xray.hpp"
#include "geoflow/constants.hpp"
#include "geoflow/config.hpp"
#include "geoflow/report.hpp"
#include "geoflow/runner.hpp"
