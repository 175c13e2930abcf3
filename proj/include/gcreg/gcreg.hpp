#pragma once

#include "gcreg/baselines.hpp"
#include "gcreg/curvature.hpp"
#include "gcreg/error.hpp"
#include "gcreg/field.hpp"
#include "gcreg/fixtures.hpp"
#include "gcreg/image_io.hpp"
#include "gcreg/metrics.hpp"
#include "gcreg/oracle.hpp"
#include "gcreg/registration.hpp"
#include "gcreg/render.hpp"
#include "gcreg/report.hpp"
#include "gcreg/similarity.hpp"
#include "gcreg/solver_gc.hpp"
