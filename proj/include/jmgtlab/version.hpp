#pragma once

#define JMGTLAB_VERSION "0.1.0"
