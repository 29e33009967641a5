// Runs the full acceptance battery and prints one PASS/FAIL line per criterion.

#include <iostream>

#include "dpplab/battery.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path out = argc > 1 ? argv[1] : "acceptance-out";
  try {
    std::size_t failed = 0;
    const auto lines = dpplab::verify_all(out, dpplab::BatteryOptions{}, [&](const dpplab::CriterionLine& l) {
      std::cout << dpplab::battery_line(l) << std::endl;
      if (!l.pass) ++failed;
    });
    std::cout << lines.size() - failed << "/" << lines.size() << " criteria pass" << std::endl;
    return failed == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << "\n";
    return 2;
  }
}
