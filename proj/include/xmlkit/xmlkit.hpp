// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "xmlkit/databind.hpp"
#include "xmlkit/parse.hpp"
#include "xmlkit/schema.hpp"
#include "xmlkit/serialize.hpp"
#include "xmlkit/stf.hpp"
#include "xmlkit/xml.hpp"
#include "xmlkit/xpath.hpp"
#include "xmlkit/xslt.hpp"
