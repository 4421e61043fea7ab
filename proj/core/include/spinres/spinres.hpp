#pragma once

#include <spinres/cavity_qed.hpp>
#include <spinres/constants.hpp>
#include <spinres/crossing_fit.hpp>
#include <spinres/designer.hpp>
#include <spinres/error.hpp>
#include <spinres/fit_models.hpp>
#include <spinres/least_squares.hpp>
#include <spinres/parallel.hpp>
#include <spinres/pulse_sim.hpp>
#include <spinres/spectra.hpp>
#include <spinres/spin_models.hpp>
#include <spinres/sweep.hpp>
