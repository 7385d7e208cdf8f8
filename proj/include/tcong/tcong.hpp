#pragma once

#include "tcong/errors.hpp"
#include "tcong/arith.hpp"
#include "tcong/abgroups.hpp"
#include "tcong/iwalg.hpp"
#include "tcong/qexpand.hpp"
#include "tcong/eiscoeff.hpp"
#include "tcong/cmfields.hpp"
#include "tcong/k1patch.hpp"
#include "tcong/synthetic.hpp"
#include "tcong/workspace.hpp"
#include "tcong/report.hpp"
#include "tcong/commands.hpp"
