#pragma once

#include "gdapl/params.hpp"
#include "gdapl/smooth.hpp"
#include "gdapl/field.hpp"
#include "gdapl/flow.hpp"
#include "gdapl/objective.hpp"
#include "gdapl/gda.hpp"
#include "gdapl/verify.hpp"
#include "gdapl/figure.hpp"
#include "gdapl/report.hpp"
#include "gdapl/cli.hpp"
