#ifndef ISLANDGA_ISLANDGA_HPP
#define ISLANDGA_ISLANDGA_HPP

#include "islandga/core.hpp"
#include "islandga/dataset.hpp"
#include "islandga/decision_tree.hpp"
#include "islandga/driver.hpp"
#include "islandga/errors.hpp"
#include "islandga/executor.hpp"
#include "islandga/fss.hpp"
#include "islandga/operators.hpp"
#include "islandga/persistence.hpp"
#include "islandga/pipeline.hpp"
#include "islandga/rng.hpp"

#endif // ISLANDGA_ISLANDGA_HPP
