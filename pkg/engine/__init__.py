# make engine a package
