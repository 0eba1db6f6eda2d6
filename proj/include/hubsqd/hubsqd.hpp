#pragma once

#include "hubsqd/common.hpp"
#include "hubsqd/sparse.hpp"
#include "hubsqd/fock.hpp"
#include "hubsqd/exact.hpp"
#include "hubsqd/davidson.hpp"
#include "hubsqd/models.hpp"
#include "hubsqd/rydberg.hpp"
#include "hubsqd/vqite.hpp"
#include "hubsqd/sqd.hpp"
#include "hubsqd/oracles.hpp"
#include "hubsqd/io.hpp"
