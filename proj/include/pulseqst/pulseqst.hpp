#ifndef PULSEQST_PULSEQST_HPP
#define PULSEQST_PULSEQST_HPP

#include "pulseqst/config.hpp"
#include "pulseqst/control.hpp"
#include "pulseqst/device.hpp"
#include "pulseqst/gradient.hpp"
#include "pulseqst/hamiltonians.hpp"
#include "pulseqst/optimizer.hpp"
#include "pulseqst/qcore.hpp"
#include "pulseqst/stateprep.hpp"
#include "pulseqst/tomography.hpp"

#endif  // PULSEQST_PULSEQST_HPP
