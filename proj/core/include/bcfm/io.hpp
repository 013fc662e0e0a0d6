#pragma once

#include <string>

#include "bcfm/gibbs.hpp"
#include "bcfm/selection.hpp"
#include "bcfm/simulate.hpp"
#include "bcfm/study.hpp"

namespace bcfm {

// ---- locale-free number formatting ------------------------------------------

// Shortest decimal string that parses back to the exact same double; always
// '.' as the decimal separator.  Non-finite values become "inf", "-inf",
// "nan".
std::string format_double(double x);

// Fixed-point with `places` digits after the '.', locale-free.
std::string format_fixed(double x, int places);

// ---- datasets ----------------------------------------------------------------

// CSV with a header row of variable names and n rows of R numeric fields.
// Ragged rows, non-numeric or missing cells raise DataError naming the file
// line and column; numbers are parsed with '.' decimals in any locale.
Dataset read_dataset(const std::string& path);

// Inverse of read_dataset; writing then reading reproduces the matrix bit for
// bit.
void write_dataset(const std::string& path, const Dataset& data);

// ---- run artifacts -------------------------------------------------------------

void write_truth(const std::string& path, const GroundTruth& truth);
void write_summaries(const std::string& path, const ChainOutput& chain);
// subject,p_1..p_K,modal with 6-decimal probabilities; subject and modal
// cluster are 1-based.
void write_assignments(const std::string& path, const ChainOutput& chain);
// One row per retained draw: draw,log_joint,p_*,tau_*,sigma2_1.
void write_trace(const std::string& path, const ChainOutput& chain);
// K,F,d,loglik,ic with +infinity written as the literal "inf".
void write_ic_table(const std::string& path, const std::vector<ICRecord>& table);
void write_best(const std::string& path, const ICRecord& best);
// Where a failed chain stopped: iteration, block, message, and the last valid
// state (labels 1-based, matrices row-major).
void write_checkpoint(const std::string& path, const ChainError& error);

// ---- comparison study artifacts ------------------------------------------------

// separation,method,replicate,K_hat,F_hat
void write_compare_rows(const std::string& path, const std::vector<CompareRow>& rows);
// separation,method,replicates,mean_K,se_K,mean_F,se_F
void write_compare_summary(const std::string& path,
                           const std::vector<CompareSummaryRow>& rows);

}  // namespace bcfm
