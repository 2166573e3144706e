// Grid search over transformer layout parameters against reference metrics.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "tsvqvco/em/transformer.hpp"

using namespace tsvqvco::em;

int main(int argc, char** argv) {
    const bool spiral = argc > 1 && std::string(argv[1]) == "vertical_spiral";
    // Reference: L_p, L_s, k_ps, k_ss, area (mm²)
    const double ref[5] = {spiral ? 2.97e-9 : 2.99e-9, spiral ? 0.36e-9 : 0.38e-9, spiral ? 0.54 : 0.52,
                           spiral ? 0.29 : 0.15, spiral ? 0.14 : 0.17};
    struct Row {
        double err;
        TransformerGeometry g;
        TransformerModel m;
    };
    std::vector<Row> rows;
    TransformerGeometry g;
    g.style = spiral ? TransformerStyle::vertical_spiral : TransformerStyle::toroidal;
    // Optional: pitch_lo pitch_hi pitch_step row_lo row_hi row_step
    double lim[6] = {25, spiral ? 1200.0 : 60.0, spiral ? 10.0 : 5.0, 25, spiral ? 200.0 : 150.0, spiral ? 5.0 : 25.0};
    for (int i = 0; i < 6 && i + 2 < argc; ++i) lim[i] = std::atof(argv[i + 2]);
    const int np_max = spiral ? 3 : 40;
    for (int np = (spiral ? 1 : 8); np <= np_max; np += (spiral ? 1 : 2))
        for (int ns = 1; ns <= (spiral ? np : np / 2); ++ns)
            for (double pitch = lim[0]; pitch <= lim[1]; pitch += lim[2])
                for (double row = lim[3]; row <= lim[4]; row += lim[5]) {
                    g.turns_primary = np;
                    g.turns_secondary = ns;
                    g.tsv_pitch = pitch;
                    g.row_spacing = row;
                    try {
                        auto m = build_transformer(g);
                        const double v[5] = {m.L_p, m.L_s(), m.k_ps(), m.k_ss, m.area};
                        // Rank by number of targets missed at ±30%, then by worst error.
                        double e = 0;
                        int miss = 0;
                        for (int i = 0; i < 5; ++i) {
                            e = std::max(e, std::abs(v[i] / ref[i] - 1.0));
                            miss += std::abs(v[i] / ref[i] - 1.0) > 0.3;
                        }
                        e += miss;
                        rows.push_back({e, g, m});
                    } catch (const std::exception&) {
                    }
                }
    std::sort(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.err < b.err; });
    for (std::size_t i = 0; i < std::min<std::size_t>(20, rows.size()); ++i) {
        auto& r = rows[i];
        std::printf("err=%.3f np=%d ns=%d pitch=%.0f row=%.0f | Lp=%.3f Ls=%.3f/%.3f kps=%.3f/%.3f kss=%.3f A=%.4f "
                    "Rpdc=%.0fm Rpac=%.2f Rsdc=%.0fm Rsac=%.2f\n",
                    r.err, r.g.turns_primary, r.g.turns_secondary, r.g.tsv_pitch, r.g.row_spacing, r.m.L_p * 1e9,
                    r.m.L_s1 * 1e9, r.m.L_s2 * 1e9, r.m.k_ps1, r.m.k_ps2, r.m.k_ss, r.m.area, r.m.R_pdc * 1e3,
                    r.m.R_pac, r.m.R_sdc * 1e3, r.m.R_sac);
    }
}
