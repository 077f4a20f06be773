#pragma once

namespace sfl::units {

// All internal math is linear-scale SI. These are the only conversions.
double db_to_linear(double db);
double linear_to_db(double linear);

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

}  // namespace sfl::units
