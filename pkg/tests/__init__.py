# RSpatio Tests
