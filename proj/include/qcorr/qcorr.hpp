#pragma once

#include "qcorr/errors.hpp"
#include "qcorr/linalg.hpp"
#include "qcorr/states.hpp"
#include "qcorr/entanglement.hpp"
#include "qcorr/nonlocality.hpp"
#include "qcorr/sdp.hpp"
#include "qcorr/steering.hpp"
#include "qcorr/parallel.hpp"
#include "qcorr/hierarchy.hpp"
#include "qcorr/tomography.hpp"
#include "qcorr/io.hpp"
