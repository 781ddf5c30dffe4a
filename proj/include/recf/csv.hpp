#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "recf/harness.hpp"

// CSV output. All numbers go through format_g17 (shortest 17-significant-digit
// form), so rewriting the same results yields byte-identical files.

namespace recf {

std::string format_g17(double v);

// iteration,filter,mse_db,emse_db,msd_db — filter-major; metrics a filter
// does not define stay blank.
void write_curves_csv(std::ostream& os, const LearningCurves& lc);

// filter,ser,errors,symbols,diverged_runs
void write_ser_csv(std::ostream& os, const EqualizationResult& eq);

// filter,index,re,im,truth_re,truth_im — test-phase outputs of run 0
void write_eye_csv(std::ostream& os, const EqualizationResult& eq);

// filter,total_s,per_update_us,growth_exponent,timed_updates,warmup_updates
void write_bench_csv(std::ostream& os, const std::vector<TimingResult>& res);

// filter,block,center,seconds
void write_bench_blocks_csv(std::ostream& os, const std::vector<TimingResult>& res);

}  // namespace recf
