# Verification routers module