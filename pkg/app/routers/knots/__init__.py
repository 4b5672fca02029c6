# Knots routers module