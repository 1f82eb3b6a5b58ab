#include "equity/pipeline.hpp"

int main(int argc, char** argv) { return equity::run_pipeline(argc, argv); }
