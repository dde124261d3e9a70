#include "accelcal/cli_app.hpp"

int main(int argc, char** argv) { return accelcal::cli::run(argc, argv); }
