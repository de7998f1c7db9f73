#include "ipf/syntax.hpp"
