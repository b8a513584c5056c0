/* One stage of the wealth recursion for a block of parameter slots.
 *
 * Straight-line selects only, so GCC vectorises the loop without fast-math.
 * Kept out of line: once inlined, the restrict guarantees are lost and GCC
 * falls back to its scalar alias-check path (about 3x slower).
 * Invariant violations are tracked as per-slot running maxima (`shortfall`
 * below -tol * V_max for bankruptcy, `excess` above d_max + tol for a
 * drawdown breach) and decoded once by the caller. */
#ifndef DDMOD_STEPCORE_H
#define DDMOD_STEPCORE_H

#define DDMOD_TOL 1e-12

static __attribute__((noinline)) void ddmod_markowitz_stage(
    int n, double x, const double *restrict g, double *restrict v,
    double *restrict vmax, double *restrict worst,
    double *restrict shortfall)
{
    for (int j = 0; j < n; j++) {
        double vj = v[j] + (g[j] * v[j]) * x;
        double s = -DDMOD_TOL * vmax[j] - vj;
        shortfall[j] = s > shortfall[j] ? s : shortfall[j];
        vj = vj > 0.0 ? vj : 0.0;
        double m = vj > vmax[j] ? vj : vmax[j];
        double dj = (m - vj) / m;
        worst[j] = dj > worst[j] ? dj : worst[j];
        vmax[j] = m;
        v[j] = vj;
    }
}

static __attribute__((noinline)) void ddmod_modulated_stage(
    int n, double x, const double *restrict g, const double *restrict dm,
    double *restrict v, double *restrict vmax, double *restrict d,
    double *restrict worst, double *restrict shortfall,
    double *restrict excess)
{
    for (int j = 0; j < n; j++) {
        double dj = d[j];
        double e = dj - (dm[j] + DDMOD_TOL);
        excess[j] = e > excess[j] ? e : excess[j];
        double slack = dm[j] - dj;
        slack = slack > 0.0 ? slack : 0.0;
        double f = g[j] * (slack / (1.0 - dj));
        double vj = v[j] + (f * v[j]) * x;
        double s = -DDMOD_TOL * vmax[j] - vj;
        shortfall[j] = s > shortfall[j] ? s : shortfall[j];
        vj = vj > 0.0 ? vj : 0.0;
        double m = vj > vmax[j] ? vj : vmax[j];
        dj = (m - vj) / m;
        worst[j] = dj > worst[j] ? dj : worst[j];
        vmax[j] = m;
        d[j] = dj;
        v[j] = vj;
    }
}

#define DDMOD_BLOCK 32

/* Accumulate sum R, sum R^2, sum d*, sum d*^2 into out[4 * j + c] for every
 * parameter slot j, sequentially over paths in index order. V(0) = 1.
 * Returns bit 0 on bankruptcy, bit 1 on a drawdown-cap breach. */
static int ddmod_grid_sums(const double *values, const unsigned char *idx,
                           long n_paths, long n, int modulated,
                           const double *gains, const double *dmaxes,
                           long n_par, double *out)
{
    double v[DDMOD_BLOCK], vmax[DDMOD_BLOCK], d[DDMOD_BLOCK];
    double worst[DDMOD_BLOCK], shortfall[DDMOD_BLOCK], excess[DDMOD_BLOCK];
    double g[DDMOD_BLOCK], dm[DDMOD_BLOCK];
    int status = 0;
    for (long j0 = 0; j0 < n_par; j0 += DDMOD_BLOCK) {
        int jb = n_par - j0 < DDMOD_BLOCK ? (int)(n_par - j0) : DDMOD_BLOCK;
        for (int j = 0; j < jb; j++) {
            g[j] = gains[j0 + j];
            dm[j] = modulated ? dmaxes[j0 + j] : 0.0;
            shortfall[j] = 0.0;
            excess[j] = 0.0;
        }
        for (long p = 0; p < n_paths; p++) {
            const unsigned char *row = idx + p * n;
            for (int j = 0; j < jb; j++) {
                v[j] = 1.0;
                vmax[j] = 1.0;
                d[j] = 0.0;
                worst[j] = 0.0;
            }
            if (modulated) {
                for (long k = 0; k < n; k++)
                    ddmod_modulated_stage(jb, values[row[k]], g, dm, v, vmax,
                                          d, worst, shortfall, excess);
            } else {
                for (long k = 0; k < n; k++)
                    ddmod_markowitz_stage(jb, values[row[k]], g, v, vmax,
                                          worst, shortfall);
            }
            double *o = out + 4 * j0;
            for (int j = 0; j < jb; j++) {
                double r = v[j] - 1.0;
                o[4 * j] += r;
                o[4 * j + 1] += r * r;
                o[4 * j + 2] += worst[j];
                o[4 * j + 3] += worst[j] * worst[j];
            }
        }
        for (int j = 0; j < jb; j++) {
            status |= shortfall[j] > 0.0;
            status |= (excess[j] > 0.0) << 1;
        }
    }
    return status;
}

#endif
