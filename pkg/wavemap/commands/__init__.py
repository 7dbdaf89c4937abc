EXIT_OK = 0
EXIT_CERTIFICATE_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_COMPUTE_ERROR = 3
