#pragma once

#include "corrmimo/channel.hpp"
#include "corrmimo/experiment.hpp"
#include "corrmimo/link.hpp"
#include "corrmimo/majorization.hpp"
#include "corrmimo/matcore.hpp"
#include "corrmimo/mc.hpp"
#include "corrmimo/metrics.hpp"
#include "corrmimo/precoding.hpp"
#include "corrmimo/rng.hpp"
#include "corrmimo/types.hpp"
