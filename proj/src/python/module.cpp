#include <pybind11/pybind11.h>
PYBIND11_MODULE(ipfkernel, m) { m.doc() = "stub"; }
