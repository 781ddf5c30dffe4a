#include "recf/csv.hpp"

#include <cstdio>

namespace recf {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_curves_csv(std::ostream& os, const LearningCurves& lc) {
    os << "iteration,filter,mse_db,emse_db,msd_db\n";
    for (const auto& fc : lc.filters) {
        for (std::size_t i = 0; i < fc.mse_db.size(); ++i) {
            os << i << ',' << fc.label << ',' << format_g17(fc.mse_db[i]) << ',';
            if (fc.has_emse) os << format_g17(fc.emse_db[i]);
            os << ',';
            if (fc.has_msd) os << format_g17(fc.msd_db[i]);
            os << '\n';
        }
    }
}

void write_ser_csv(std::ostream& os, const EqualizationResult& eq) {
    os << "filter,ser,errors,symbols,diverged_runs\n";
    for (const auto& pf : eq.filters) {
        os << pf.label << ',' << format_g17(pf.ser.ser) << ',' << pf.ser.errors << ','
           << pf.ser.count << ',' << pf.diverged_runs << '\n';
    }
}

void write_eye_csv(std::ostream& os, const EqualizationResult& eq) {
    os << "filter,index,re,im,truth_re,truth_im\n";
    for (const auto& pf : eq.filters) {
        for (std::size_t i = 0; i < pf.eye.size(); ++i) {
            os << pf.label << ',' << i << ',' << format_g17(pf.eye[i].real()) << ','
               << format_g17(pf.eye[i].imag()) << ',' << format_g17(pf.eye_truth[i].real())
               << ',' << format_g17(pf.eye_truth[i].imag()) << '\n';
        }
    }
}

void write_bench_csv(std::ostream& os, const std::vector<TimingResult>& res) {
    os << "filter,total_s,per_update_us,growth_exponent,timed_updates,warmup_updates\n";
    for (const auto& tr : res) {
        os << tr.label << ',' << format_g17(tr.total_s) << ','
           << format_g17(tr.per_update_us) << ',' << format_g17(tr.growth_exponent)
           << ',' << tr.timed_updates << ',' << tr.warmup_updates << '\n';
    }
}

void write_bench_blocks_csv(std::ostream& os, const std::vector<TimingResult>& res) {
    os << "filter,block,center,seconds\n";
    for (const auto& tr : res) {
        for (std::size_t b = 0; b < tr.block_s.size(); ++b) {
            os << tr.label << ',' << b << ',' << format_g17(tr.block_center[b]) << ','
               << format_g17(tr.block_s[b]) << '\n';
        }
    }
}

}  // namespace recf
