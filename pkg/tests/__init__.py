# blowup-lab tests
