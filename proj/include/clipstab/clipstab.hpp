#pragma once

#include <clipstab/config.hpp>
#include <clipstab/core.hpp>
#include <clipstab/ensembles.hpp>
#include <clipstab/experiments.hpp>
#include <clipstab/montecarlo.hpp>
#include <clipstab/nonlinear_ops.hpp>
#include <clipstab/parallel.hpp>
#include <clipstab/probability.hpp>
#include <clipstab/properties.hpp>
#include <clipstab/quadrature.hpp>
#include <clipstab/recovery.hpp>
#include <clipstab/report.hpp>
#include <clipstab/rng.hpp>
#include <clipstab/scaling.hpp>
#include <clipstab/signal_sets.hpp>
#include <clipstab/stability.hpp>
