#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qelogit/panel.hpp"

namespace qelogit {

// Long-format panel CSV with header id,time,y,<covariate names...>.
// Time 0 carries the initial response; a time -1 row, when present on every
// unit, carries the pre-sample response for two-lag estimation.
PanelDataset ingest_csv(std::istream& in, const std::string& origin = "<stream>");
PanelDataset ingest_csv(const std::string& path);

void export_csv(const PanelDataset& ds, std::ostream& out);
void export_csv(const PanelDataset& ds, const std::string& path);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

std::string fit_result_to_json(const FitResult& result,
                               const std::vector<ConfInterval>* intervals = nullptr,
                               double level = 0.0);

}  // namespace qelogit
