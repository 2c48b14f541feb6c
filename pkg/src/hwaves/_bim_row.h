/* One row of the boundary-integral kernel; see _ckernels.pyx. */
#ifndef HWAVES_BIM_ROW_H
#define HWAVES_BIM_ROW_H

#include <stddef.h>

static inline void hw_kernel_row(
    double *restrict re, double *restrict im,
    const double *restrict sat, const double *restrict cat, const double *restrict cot,
    const double *restrict S, const double *restrict C, const double *restrict hx,
    ptrdiff_t i, ptrdiff_t j0, ptrdiff_t j1, ptrdiff_t shift)
{
    const double Si = S[i], Ci = C[i];
    const double *restrict sa_ = sat + shift - i;
    const double *restrict ca_ = cat + shift - i;
    const double *restrict ct_ = cot + shift - i;
    for (ptrdiff_t j = j0; j < j1; j++) {
        double sa = sa_[j], ca = ca_[j];
        double sh = S[j] * Ci - C[j] * Si;
        double ch = C[j] * Ci - S[j] * Si;
        double w = 0.5 / (sa * sa + sh * sh);
        im[j] = (hx[j] * sa * ca - sh * ch) * w;
        re[j] = (hx[j] * sh * ch - ct_[j] * sh * sh) * w;
    }
}

#endif
