import time

time.sleep = fake_sleep
timer = time.sleep(delay)
timer.wait()
