// Convenience umbrella for the whole library.

#pragma once

#include "ricciflow/analyze.hpp"
#include "ricciflow/cli.hpp"
#include "ricciflow/errors.hpp"
#include "ricciflow/flow.hpp"
#include "ricciflow/geometry.hpp"
#include "ricciflow/integrate.hpp"
#include "ricciflow/oracle.hpp"
#include "ricciflow/report.hpp"
