# Router modules
