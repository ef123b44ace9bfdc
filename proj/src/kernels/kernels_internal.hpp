#pragma once

#include "residue_lab/kernels/kernels.hpp"

namespace residue_lab::kernels {

extern const KernelSet kScalarKernels;

#ifdef RESIDUE_LAB_HAVE_AVX2
extern const KernelSet kAvx2Kernels;
#endif

}  // namespace residue_lab::kernels
